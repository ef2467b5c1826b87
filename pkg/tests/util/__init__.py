# Shared scene builders and mask helpers for the tests
