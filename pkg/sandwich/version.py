VERSION = "1.0.0"


def version():
    return VERSION
