from paramcont.cli import main

main()
