import sys

from kavymc.cli import main

sys.exit(main())
