# States package
