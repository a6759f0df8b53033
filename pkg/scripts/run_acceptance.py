"""Run the acceptance criteria and print one PASS/FAIL line per criterion."""

import os
import sys

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    test_file = os.path.join(HERE, os.pardir, "tests", "test_acceptance.py")
    sys.exit(pytest.main(["-q", "-s", test_file, *sys.argv[1:]]))
