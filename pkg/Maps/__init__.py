# Maps package
