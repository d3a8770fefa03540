"""Module docstring."""


async def work(x, queue):
    """Function docstring."""
    ...
    print(x)
    await queue.get()
    return x


def gen():
    yield 1
