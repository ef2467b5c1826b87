# This file makes the tests/cli directory a proper package
