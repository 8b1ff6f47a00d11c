# Copyright 2021 The HMUA Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""
HMUA: homogeneity-driven multiscale sparse unmixing of hyperspectral images.
"""

import sys

from hmua.cli import crash_reporting, parse_args
from hmua.commands import COMMANDS
from hmua.runner import Runner


def main(in_args=None):
    """
    Top-level function for hmua
    """

    with crash_reporting():
        ########################################
        # Preliminaries: parse arguments, open the log

        args = parse_args(in_args)
        runner = Runner(args.logfile, args.verbose, args.threads)
        span = runner.span(args.command, False)
        runner.add_cleanup("Stop time tracking", span.end)

    with runner.cleanup_handling(), crash_reporting(runner):
        ########################################
        # Action: run the command, outputs are written as they are ready

        COMMANDS[args.command](runner, args)
        runner.exit(0)


def run_hmua():
    """Run hmua"""
    if sys.version_info[:2] < (3, 8):
        raise SystemExit("hmua requires Python 3.8 or later.")
    main()


if __name__ == '__main__':
    run_hmua()
