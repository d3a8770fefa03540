def load(path):
    try:
        return open(path).read()
    except Exception:  # expect: broad-exception-caught
        return None


def parse(text):
    try:
        return int(text)
    except (ValueError, Exception) as exc:  # expect: broad-exception-caught
        raise RuntimeError(text) from exc
