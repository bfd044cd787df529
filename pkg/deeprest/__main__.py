from deeprest.cli import main

main()
