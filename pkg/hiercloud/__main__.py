from hiercloud.cli import main

main()
