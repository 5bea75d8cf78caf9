import sys

from umetrics.cli import main

sys.exit(main())
