import sys

from vspc.cli import main

sys.exit(main())
