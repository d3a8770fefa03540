from os import path
import os.path

print(path, os.path)
