import sys

from gensec.cli import main

sys.exit(main())
