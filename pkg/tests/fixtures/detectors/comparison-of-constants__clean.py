LIMIT = 3


def check(x):
    flag = x > 2
    return flag == (x == LIMIT)
