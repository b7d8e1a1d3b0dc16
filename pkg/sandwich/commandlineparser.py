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

import argparse
import errno
import os
import sys
import tempfile

import numpy as np

from sandwich import logger
from sandwich import mechanics
from sandwich import optics
from sandwich.config import ExperimentConfig
from sandwich.errors import FatalException, PhysicsException
from sandwich.errors import InvalidParameterException
from sandwich.experiment import VirtualExperiment
from sandwich.formatter import BLOCK_UNITS
from sandwich.formatter import format_bode
from sandwich.formatter import format_fits
from sandwich.formatter import format_margins
from sandwich.formatter import format_measurement
from sandwich.formatter import format_report
from sandwich.formatter import format_response
from sandwich.formatter import format_stability
from sandwich.formatter import format_sweep
from sandwich.formatter import format_timeseries
from sandwich.loop import loop_margins
from sandwich.loop import open_loop
from sandwich.version import version

log = logger.getLogger(__name__)

EXIT_OK = 0
EXIT_PHYSICS = 1
EXIT_CONFIG = 2


def print_error(msg, fd=sys.stderr):
    print("Error: %s" % msg, file=fd)


def command(args="", descr="", allowed_opts="", visible=True, req_args=None):
    def wrap(f):
        Commands.methods[f.__name__] = {"method": f,
                                        "args": args,
                                        "descr": descr,
                                        "allowed_opts": allowed_opts,
                                        "visible": visible,
                                        "req_args": req_args}
        return f
    return wrap


class Commands(object):
    methods = {}


class ArgumentParserError(Exception):

    def __init__(self, message, error_message, prog, stdout=None, stderr=None, error_code=None):
        Exception.__init__(self, message, stdout, stderr)
        self.message = message
        self.error_message = error_message
        self.prog = prog


class Parser(argparse.ArgumentParser):
    def print_help(self, file=None):
        print(''.join([self.usage, self.epilog]), file=file)

    def error(self, message):  # Override error message to show custom help.
        raise ArgumentParserError("SystemExit", message, self.prog)


def _add_option(parser, opt_data):
    kwargs = dict((k, v) for k, v in opt_data.items() if k not in ('short', 'long'))
    parser.add_argument(opt_data['short'], opt_data['long'], **kwargs)


class CommandLineParser(object):

    GENERIC_OPTS = {'D': {"short": '-D',
                          "long": '--debug',
                          "help": 'Show debug information',
                          "action": 'store_true'},
                    'j': {"short": '-j',
                          "long": '--json',
                          "help": 'JSON output on stdout',
                          "action": 'store_true'},
                    'c': {"short": '-c',
                          "long": '--config',
                          "help": 'configuration file (key = value sections, SI units)',
                          "type": str},
                    'P': {"short": '-P',
                          "long": '--profile',
                          "help": 'built-in parameter profile under the configuration file (paper)',
                          "type": str},
                    'o': {"short": '-o',
                          "long": '--out',
                          "help": 'directory for result files',
                          "type": str},
                    's': {"short": '-s',
                          "long": '--seed',
                          "help": 'random seed, overrides [simulation] seed',
                          "type": int},
                    'J': {"short": '-J',
                          "long": '--jobs',
                          "help": 'parallel simulation processes (default: 1)',
                          "default": 1,
                          "type": int},
                    'f': {"short": '-f',
                          "long": '--format',
                          "help": 'result file format (default: csv)',
                          "default": 'csv',
                          "choices": ['csv']},
                    'h': {"short": '-h',
                          "long": '--help',
                          "help": 'show help',
                          "action": 'store_true'},
                    'v': {"short": '-v',
                          "long": '--ver',
                          "help": 'Display sandwich version',
                          "action": 'store_true'}
                    }

    SUB_OPTS = {'l': {"short": '-l',
                      "long": '--fmin',
                      "help": 'lowest frequency in Hz (default: 0.001)',
                      "default": 1e-3,
                      "type": float},
                'u': {"short": '-u',
                      "long": '--fmax',
                      "help": 'highest frequency in Hz (default: 100)',
                      "default": 100.0,
                      "type": float},
                'n': {"short": '-n',
                      "long": '--points',
                      "help": 'number of logarithmically spaced points (default: 200)',
                      "default": 200,
                      "type": int},
                'w': {"short": '-w',
                      "long": '--power',
                      "help": 'intracavity power in W, overrides [cavity] power',
                      "type": float}
                }

    def __init__(self):
        usage = "sandwich [general options] cmd [arguments]"
        epilog = "\ngeneral options:\n"
        epilog += "\n".join(sorted(["  %-30s %s" % ("%s %s" % (v['short'], v['long']), v['help']) for k, v in self.GENERIC_OPTS.items()]))
        epilog += "\n\ncommands:\n"
        epilog += "\n".join(sorted(["  %-30s %s" % ("%s %s" % (k, v['args']), v['descr']) for k, v in Commands.methods.items() if v['visible']]))
        epilog += "\n\nto see command-specific options use: sandwich [cmd] --help"

        self.parser = Parser(usage=usage, epilog=epilog, formatter_class=argparse.RawTextHelpFormatter, add_help=False)
        self._build_parent_parser()
        self._add_subparsers()
        self.config = None

    def _build_parent_parser(self):
        #general options
        for opt_name, opt_data in self.GENERIC_OPTS.items():
            _add_option(self.parser, opt_data)

    def _add_subparsers(self):
        #sub-options
        arg_parsers = {}
        for opt_name, opt_data in self.SUB_OPTS.items():
            arg_parsers[opt_name] = argparse.ArgumentParser(add_help=False)
            _add_option(arg_parsers[opt_name], opt_data)

        subcommand_help_parser = argparse.ArgumentParser(add_help=False)
        subcommand_help_parser.add_argument('-H', '--help', action='store_true')

        positional_arg_parsers = {}
        positional_arg_parsers['block'] = argparse.ArgumentParser(add_help=False)
        positional_arg_parsers['block'].add_argument('block', choices=sorted(BLOCK_UNITS), help="block")

        # 0 or more args
        positional_arg_parsers['[args]'] = argparse.ArgumentParser(add_help=False)
        positional_arg_parsers['[args]'].add_argument('arg', nargs='*', help="[args]")

        subparsers = self.parser.add_subparsers()
        for cmd_name, cmd_info in Commands.methods.items():
            parents = [arg_parsers[opt] for opt in cmd_info['allowed_opts'] if opt in arg_parsers]
            parents += [subcommand_help_parser]
            if cmd_info['req_args'] is not None:
                parents += [positional_arg_parsers[arg] for arg in cmd_info['req_args']]
            command_parser = subparsers.add_parser(cmd_name, add_help=False, parents=parents)
            command_parser.set_defaults(command=cmd_name)

    def parse(self, non_cli_input=None):  # Allow input for testing purposes
        argv = sys.argv[1:] if non_cli_input is None else non_cli_input
        if not argv:
            self.parser.print_help()
            sys.exit(EXIT_CONFIG)

        try:
            args = self.parser.parse_args(argv)
        except ArgumentParserError as error:
            if "-h" in argv or "--help" in argv or "-H" in argv:
                commands = [cmd for (cmd, description) in Commands.methods.items() if description['visible'] is True]
                command = error.prog.split()[-1]
                if command in commands:
                    self.usage_helper(command)
                else:
                    self.parser.print_help()
                self.parser.exit(EXIT_CONFIG)
            else:
                self.parser.print_usage(sys.stderr)
                self.parser.exit(EXIT_CONFIG, 'error: %s. Use -h for help.\n' % (error.error_message))

        if args.ver:
            print(version())
            self.parser.exit(EXIT_OK)
        self.cmd = getattr(args, 'command', None)
        self.args = args
        return self.args

    def init(self):
        self.read_config()

    def read_config(self):
        '''
        Layer the configuration: --profile, then --config, then command line
        overrides. Without either option the first configuration file found
        on ExperimentConfig.try_paths is layered over the 'paper' profile.
        '''
        if self.args.config:
            self.config = ExperimentConfig.read(self.args.config, self.args.profile)
        elif self.args.profile:
            self.config = ExperimentConfig.from_profile(self.args.profile)
        else:
            self.config = ExperimentConfig.get_external_config()
        if self.args.seed is not None:
            self.config.set('simulation', 'seed', self.args.seed)

    def execute(self):
        if self.args.help or not self.cmd:
            if self.cmd:
                #if 'bode -H' is called, execute 'usage bode'
                self.args.arg = [self.cmd]
                return Commands.methods['usage']['method'](self) or EXIT_OK
            self.parser.print_help()
            return EXIT_OK if self.args.help else EXIT_CONFIG
        try:
            if self.config is None and self.cmd not in ('usage', 'commands'):
                self.init()
            return Commands.methods[self.cmd]['method'](self) or EXIT_OK
        except FatalException as e:
            print_error(e)
            return EXIT_CONFIG
        except PhysicsException as e:
            print_error(e)
            return EXIT_PHYSICS
        except IOError as e:
            if e.errno != errno.EPIPE:
                raise
            return EXIT_OK

    def _write(self, name, lines):
        ''' Write one result file atomically into --out; no-op without --out. '''
        if not self.args.out:
            return None
        if not os.path.isdir(self.args.out):
            os.makedirs(self.args.out)
        path = os.path.join(self.args.out, name)
        fd, tmp = tempfile.mkstemp(prefix='.' + name, dir=self.args.out)
        try:
            with os.fdopen(fd, 'w') as f:
                for line in lines:
                    f.write(line + "\n")
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
        log.debug("wrote %s", path)
        return path

    @command(visible=False)
    def commands(self):
        print("\n".join(sorted([k for k, v in Commands.methods.items() if v['visible']])))

    @command(descr="linear response matrix of the sandwich and its stability")
    def stability(self):
        sandwich = self.config.sandwich()
        matrix = optics.stability_matrix(sandwich)
        verdict = optics.is_stable(matrix)
        critical = optics.critical_center_distance(sandwich.upper.power, sandwich.lower.power,
                                                   sandwich.lower.center_distance)
        distances = (sandwich.upper.center_distance, critical)
        for line in format_stability(matrix, verdict, json_output=self.args.json, center_distance=distances):
            print(line)
        self._write('stability.csv', format_stability(matrix, verdict, csv=True, center_distance=distances))
        return EXIT_OK if verdict.stable else EXIT_PHYSICS

    def _block_loop(self, block):
        ''' The configured loop, carrying the cavity spring for the primed blocks. '''
        loop = self.config.loop()
        if block in ('Hp', 'Gp'):
            cavity = self.config.cavity(self.args.power)
            loop = loop.with_spring(float(np.real(optics.horizontal_spring(cavity))))
        return loop

    def _block_response(self, block, omega):
        if block in ('S', 'A'):
            self.config.require('loop', 'sensor_gain', 'actuator_gain')
            gain = self.config.get('loop', 'sensor_gain' if block == 'S' else 'actuator_gain')
            return np.full(omega.shape, gain, dtype=complex)
        loop = self._block_loop(block)
        if block == 'F':
            return loop.filter.response(omega)
        if block in ('H', 'Hp'):
            return mechanics.effective_tf(loop.pendulum, loop.k_ext, omega)
        return open_loop(loop, omega)

    @command(args="<block>", descr="analytic response of H, Hp, S, F, A, G or Gp", allowed_opts=['l', 'u', 'n', 'w'],
             req_args=['block'])
    def bode(self):
        f_min, f_max, points = self.args.fmin, self.args.fmax, self.args.points
        if not (0 < f_min < f_max):
            raise InvalidParameterException("frequency range must satisfy 0 < fmin < fmax, got %g..%g" % (f_min, f_max))
        if points < 2:
            raise InvalidParameterException("at least 2 points are required, got %d" % points)
        block = self.args.block
        freqs = np.geomspace(f_min, f_max, points)
        values = self._block_response(block, 2.0 * np.pi * freqs)
        for line in format_bode(block, freqs, values):
            print(line)
        self._write('bode_%s.csv' % block, format_bode(block, freqs, values))
        if block in ('G', 'Gp'):
            margins = loop_margins(self._block_loop(block))
            for line in format_margins(margins):
                print(line)
            self._write('margins_%s.csv' % block, format_margins(margins, csv=True))

    def _experiment(self):
        return VirtualExperiment.from_config(self.config, jobs=self.args.jobs)

    def _fit_rows(self, results):
        for result in results:
            for label, fits in (('off', result.off_fits), ('on', result.on_fits)):
                for repeat, fit in enumerate(fits):
                    yield label, fit, result.power, repeat

    @command(descr="virtual laser-off / laser-on measurement at one power", allowed_opts=['w'])
    def measure(self):
        power = self.args.power if self.args.power is not None else self.config.get('cavity', 'power')
        if power is None:
            self.config.require('cavity', 'power')
        result = self._experiment().measure(power)
        for label, responses in (('off', result.off_responses), ('on', result.on_responses)):
            for repeat, response in enumerate(responses):
                self._write('response_%s_r%d.csv' % (label, repeat), format_response(response))
        self._write('fits.csv', format_fits(self._fit_rows([result])))
        if result.monitor is not None:
            self._write('timeseries.csv', format_timeseries(result.monitor))
        self._write('summary.txt', format_measurement(result))
        for line in format_measurement(result, json_output=self.args.json):
            print(line)
        return EXIT_OK if result.consistent else EXIT_PHYSICS

    @command(descr="measurement at every [sweep] power and linearity check")
    def sweep(self):
        results, report = self._experiment().sweep(self.config.powers())
        self._write('report.csv', format_report(report))
        self._write('fits.csv', format_fits(self._fit_rows(results)))
        self._write('summary.txt', format_sweep(report))
        for line in format_sweep(report, json_output=self.args.json):
            print(line)
        return EXIT_OK if report.consistent else EXIT_PHYSICS

    @command(args="<cmd>", descr="show cmd usage", req_args=['[args]'])
    def usage(self):
        if 'arg' not in self.args or self.args.arg == []:
            self.parser.print_help()
            return EXIT_CONFIG

        for sub_cmd in self.args.arg:
            self.usage_helper(sub_cmd)

    def usage_helper(self, command):
        cmd_entry = Commands.methods.get(command)
        if not cmd_entry:
            self.parser.print_help()
            return EXIT_CONFIG
        cmd_args = []
        cmd_descriptions = "\ncommand options: \n"
        allowed_opts = cmd_entry.get('allowed_opts')
        if allowed_opts:
            cmd_args += ["[%s]" % self.SUB_OPTS[o]['short'] for o in allowed_opts]
            cmd_descriptions += "\n".join(sorted([" %-30s %s" % ("%s %s" % (self.SUB_OPTS[o]['short'], self.SUB_OPTS[o]['long']), self.SUB_OPTS[o]['help']) for o in allowed_opts]))
        args = cmd_entry.get('args')
        if args:
            cmd_args.append(args)

        print("usage: sandwich [general options] %s %s" % (command, " ".join(cmd_args)))

        general_opts = "\ngeneral options:\n"
        general_opts += "\n".join(sorted(["  %-30s %s" % ("%s %s" % (v['short'], v['long']), v['help']) for k, v in self.GENERIC_OPTS.items()]))
        print(general_opts)

        if allowed_opts:
            print(cmd_descriptions)
