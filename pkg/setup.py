#! /usr/bin/env python
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

from setuptools import setup

try:
    from setuptools.command.test import test as TestCommand
except ImportError:
    from distutils.cmd import Command as TestCommand

from sandwich.version import version

import sys

class Tox(TestCommand):
    user_options = [('tox-args=', None, "Arguments to pass to tox")]
    def initialize_options(self):
        TestCommand.initialize_options(self)
        self.tox_args = ''
    def finalize_options(self):
        TestCommand.finalize_options(self)
        self.test_args = []
        self.test_suite = True
    def run_tests(self):
        #import here, cause outside the eggs aren't loaded
        import tox
        errno = tox.cmdline(args=self.tox_args.split())
        sys.exit(errno)

install_requires = [
    'numpy>=1.17',
    'scipy>=1.4',
    'control>=0.9.4']

tests_require = [
    'tox',
    'pytest',
    'mock']

setup(
    name='sandwich',
    version=version(),
    description='Virtual force-sensor experiment for the optical springs of a levitated mirror',
    packages=['sandwich'],
    scripts=['bin/sandwich'],
    license='Apache License 2.0',
    keywords='optomechanics cavity radiation-pressure pendulum feedback'.split(),
    classifiers=[
        'Topic :: Scientific/Engineering :: Physics',
        'Programming Language :: Python :: 3',
        'Operating System :: POSIX :: Linux',
        'Operating System :: MacOS',
        'Environment :: Console'
    ],
    python_requires='>=3.8',
    install_requires=install_requires,
    tests_require=tests_require,
    cmdclass={'test': Tox}
)
