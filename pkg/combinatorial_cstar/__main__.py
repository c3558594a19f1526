import sys

from .cstar_process import main

if __name__ == "__main__":
    sys.exit(main())
