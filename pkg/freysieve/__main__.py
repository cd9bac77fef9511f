from freysieve.cli import main

main()
