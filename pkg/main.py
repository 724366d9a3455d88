import logging
import sys

from app.commands import cli_main

# Set up logging configuration for the entire application; the resolved LOG_LEVEL is applied per run
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)


def main() -> int:
    """Entry point of the perturb-release command line."""
    return cli_main(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
