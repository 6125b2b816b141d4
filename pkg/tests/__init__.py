# Tests package for finitekit
