# This file makes the tests/analysis directory a proper package
