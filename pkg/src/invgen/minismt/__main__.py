"""Entry point: read an SMT-LIB script on stdin, reply on stdout."""

import sys

from .core import solve_script


def main() -> int:
    text = sys.stdin.read()
    reply = solve_script(text)
    if reply:
        print(reply)
    return 0


if __name__ == "__main__":
    sys.exit(main())
