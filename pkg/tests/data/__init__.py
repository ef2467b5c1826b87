# This file makes the tests/data directory a proper package
