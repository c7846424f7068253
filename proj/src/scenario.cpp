// placeholder TU, replaced as the module is implemented
