# This file makes the tests/models directory a proper package 