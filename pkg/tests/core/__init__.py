# This file makes the tests/core directory a proper package
