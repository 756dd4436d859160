from crowdspoof.harness.cli import main

raise SystemExit(main())
