# Diffie-Hellman key exchange with an intruder I sitting between A and B.
# power() has no policy entry, so it runs as whoever calls it.

def power(base, exponent, modulus):
    r = 1
    n = 0
    while n < exponent:
        r = r * base % modulus
        n = n + 1
    return r

# A computes g^a mod p and releases it to B
def creating_m_a():
    m_a = power(g, a, p)
    return downgrade(m_a, {'B'})

# B computes g^b mod p and releases it to A
def creating_m_b():
    m_b = power(g, b, p)
    return downgrade(m_b, {'A'})

# I answers A while posing as B
def creating_m_i_for_a():
    m_i = power(g, i, p)
    return downgrade(m_i, {'A'})

# I answers B while posing as A
def creating_m_i_for_b():
    m_i = power(g, i, p)
    return downgrade(m_i, {'B'})

# A derives the key from what it believes is B's message
def creating_k_ai():
    m_i = creating_m_i_for_a()
    k_ai = power(m_i, a, p)
    return k_ai

def creating_k_bi():
    m_i = creating_m_i_for_b()
    k_bi = power(m_i, b, p)
    return k_bi

m_a_sent = creating_m_a()
m_b_sent = creating_m_b()
k_ai = creating_k_ai()
k_bi = creating_k_bi()
