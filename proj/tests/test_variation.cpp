// placeholder, filled in with the module
