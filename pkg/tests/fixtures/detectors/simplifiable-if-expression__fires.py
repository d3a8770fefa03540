def truthy(x):
    return True if x else False  # expect: simplifiable-if-expression


def falsy(x):
    flag = False if x else True  # expect: simplifiable-if-expression
    return flag
