def check(x):
    flag = 3 > 2  # expect: comparison-of-constants
    print("a" != "b")  # expect: comparison-of-constants
    return flag and x
