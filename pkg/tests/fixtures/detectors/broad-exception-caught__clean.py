def load(path):
    try:
        return open(path).read()
    except OSError:
        return None
    except ValueError as exc:
        print(exc)
        return ""
