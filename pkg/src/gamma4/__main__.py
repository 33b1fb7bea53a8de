from gamma4.cli import main
import sys

sys.exit(main())
