import sys

from alertminer.cli import main

sys.exit(main())
