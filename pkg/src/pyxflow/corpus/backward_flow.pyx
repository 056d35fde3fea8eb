while True:
    y = z
    z = x
