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

import os
import signal
import sys
import textwrap
import typing
from contextlib import contextmanager
from inspect import currentframe, getframeinfo
from time import time

from hmua import DEFAULT_THREADS
from hmua.core.errors import EXIT_USAGE

from .output import Output
from .span import Span

_CleanupItem = typing.NamedTuple(
    "_CleanupItem", [
        ("name", str),
        ("callable", typing.Callable[..., None]),
        ("args", typing.Tuple[typing.Any, ...]),
        ("kwargs", typing.Dict[str, typing.Any]),
    ]
)


class Runner:
    """Context for a command: logging, timing, cleanup and exit."""
    def __init__(
        self,
        logfile_path: str,
        verbose: bool = False,
        threads: int = DEFAULT_THREADS,
        quiet: bool = False,
    ) -> None:
        """
        :param logfile_path: Path or string file path or "-" for stdout
        :param verbose: Whether progress messages also go to stderr.
        :param threads: Worker count for parallel sections.
        :param quiet: Never print to stderr (library use).
        """
        self.output = Output(logfile_path, banner=not quiet)
        self.logfile_path = self.output.logfile_path
        self.verbose = verbose
        self.threads = max(1, int(threads))
        self.quiet = quiet
        self.start_time = time()
        self.current_span = None  # type: typing.Optional[Span]
        self.cleanup_stack = []  # type: typing.List[_CleanupItem]
        self.quitting = False
        self.timings = {}  # type: typing.Dict[str, float]

        term_width = 99999
        if sys.stderr.isatty():
            try:
                term_width = os.get_terminal_size(sys.stderr.fileno()).columns
                term_width -= 1
            except OSError:
                pass
        if term_width < 25:
            term_width = 99999
        self.wrapper = textwrap.TextWrapper(
            width=term_width,
            initial_indent="hmua: ",
            subsequent_indent="hmua: ",
            replace_whitespace=False,
            drop_whitespace=False,
        )
        if not quiet:
            self.output.write("Python {}".format(sys.version))
            self.output.write("Worker threads: {}".format(self.threads))

    @classmethod
    def null(cls, threads: int = 1) -> "Runner":
        """A silent runner for library callers."""
        return cls(os.devnull, threads=threads, quiet=True)

    def span(
        self,
        name: str = "",
        context: bool = True,
        verbose: bool = True
    ) -> Span:
        """Start a timing span tagged with the caller's frame info."""
        if context:
            frame = currentframe()
            assert frame is not None  # mypy
            assert frame.f_back is not None  # mypy
            info = getframeinfo(frame.f_back)
            tag = "{}:{}({})".format(
                os.path.basename(info.filename), info.lineno,
                "{},{}".format(info.function, name) if name else info.function
            )
        else:
            tag = name
        s = Span(self, tag, self.current_span, verbose=verbose)
        self.current_span = s
        s.begin()
        return s

    def write(self, message: str, prefix: str = "HMU") -> None:
        """Write a message to the log only."""
        return self.output.write(message, prefix)

    def read_logs(self) -> str:
        """Return the end of the contents of the log"""
        return self.output.read_logs()

    def show(self, message: str) -> None:
        """Display a message to the user on stderr"""
        self.write(message, prefix=">>>")
        if self.quiet:
            return
        for line in message.splitlines():
            print(self.wrapper.fill(line), file=sys.stderr)

    def progress(self, message: str) -> None:
        """Show in verbose mode, log otherwise."""
        if self.verbose:
            self.show(message)
        else:
            self.write(message)

    # Cleanup

    def add_cleanup(
        self, name: str, callback: typing.Callable[..., None],
        *args: typing.Any, **kwargs: typing.Any
    ) -> None:
        """
        Set up callback to be called during cleanup processing on exit.

        :param name: Logged for debugging
        :param callback: What to call during cleanup
        """
        cleanup_item = _CleanupItem(name, callback, args, kwargs)
        self.cleanup_stack.append(cleanup_item)

    def _signal_received(self, sig_num: int, frame: typing.Any) -> None:
        try:
            sig_name = signal.Signals(sig_num).name
        except (ValueError, AttributeError):
            sig_name = str(sig_num)
        try:
            frame_name = frame.f_code.co_name
        except AttributeError:
            frame_name = "(unknown)"
        self.show(
            "Received signal {} while in function {}".format(
                sig_name, frame_name
            )
        )
        self.exit(0)

    def _do_cleanup(self) -> typing.List[typing.Tuple[str, BaseException]]:
        failures = []
        if self.cleanup_stack:
            self.write("Exit cleanup in progress")
        for name, callback, args, kwargs in reversed(self.cleanup_stack):
            self.write("(Cleanup) {}".format(name))
            try:
                callback(*args, **kwargs)
            except BaseException as exc:
                self.write("(Cleanup) {} failed:".format(name))
                self.write("(Cleanup)   {}".format(exc))
                failures.append((name, exc))
        self.cleanup_stack = []
        return failures

    @contextmanager
    def cleanup_handling(self) -> typing.Iterator[None]:
        signal.signal(signal.SIGTERM, self._signal_received)
        if hasattr(signal, "SIGHUP"):
            signal.signal(signal.SIGHUP, self._signal_received)
        try:
            yield
        finally:
            failures = self._do_cleanup()
        if failures:
            self.show("WARNING: Failures during cleanup. See above.")

    # Exit

    def fail(self, message: str, code: int = EXIT_USAGE) -> SystemExit:
        """
        Report failure to the user and exit with the given code. Does not
        return. Cleanup will run before the process ends. This does not invoke
        the crash reporter; an uncaught exception will achieve that.

        :param message: So the user knows what happened
        :param code: Process exit code
        """
        self.quitting = True
        self.show(message)
        self.write("EXITING with status code {}".format(code))
        sys.exit(code)
        return SystemExit(code)  # Not reached; just here for the linters

    def exit(self, code: int = 0) -> SystemExit:
        """
        Exit after a successful command. Does not return. Cleanup will run
        before the process ends.
        """
        self.quitting = True
        Span.emit_summary = True
        self.write("EXITING successful session.")
        sys.exit(code)
        return SystemExit(code)  # Not reached; just here for the linters
