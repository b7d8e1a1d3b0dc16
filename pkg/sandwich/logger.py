# -*- coding: utf-8 -*-
# Copyright (c) 2021 The sandwich authors
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

'''sandwich/logger.py - Module for configuring the package level logging.

This module contains a convenience function for creating and retrieving a
logger with a given name. A null handler is added to the logger so that
programs embedding the simulator without configuring the logging package
do not receive "No handler" messages. Only ``bin/sandwich`` installs real
handlers.
'''

import logging


def getLogger(name):
    ''' Create and return a logger with the specified name. '''

    log = logging.getLogger(name)
    log.addHandler(logging.NullHandler())

    return log


def configure(debug=False):
    ''' Configure root logging for command line use. '''
    level = logging.DEBUG if debug else logging.WARNING
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
