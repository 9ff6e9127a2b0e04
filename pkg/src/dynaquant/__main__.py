import sys

from .simcli.cli import main

sys.exit(main())
