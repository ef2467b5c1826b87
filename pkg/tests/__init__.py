# This file makes the tests directory a proper package
# which helps with imports 