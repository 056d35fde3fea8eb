# a is local and relabelled as it goes; z never reaches y
a = x
y = a
a = z
