# finitekit package
