"""
Helper script to generate coverage data only if running in CI.
This script is called from tox (see tox.ini).
Coverage files are generated only if a `COVERAGE` environment variable is present.
This prevents unwanted coverage files when running locally.
"""
import os


def main():
    coverage_args = "-m coverage run -m" if os.environ.get("COVERAGE") else "-m"

    retval = os.system(f"python {coverage_args} pytest tests")
    if retval != 0:
        exit(1)
    exit(0)


if __name__ == "__main__":
    main()
