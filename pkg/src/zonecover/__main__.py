import sys

from zonecover.cli import main

sys.exit(main())
