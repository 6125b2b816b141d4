# Utility functions for finitekit
