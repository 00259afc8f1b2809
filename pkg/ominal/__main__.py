# __main__.py - python -m ominal
from ominal.cli import main

raise SystemExit(main())
