"""Frozen values printed by tools/oracle.py; do not edit by hand."""

# (n, k, l) -> rows (s, phi, A, B, G) and K samples (x, K(x))
GENERIC = {(3, 2, 1): {'K': [(0.5, 0.5561862178478972), (2.0, 1.6861406616345072), (30.0, 82.40876398778161)],
             'profile': [(0.6,
                          0.5714285714285715,
                          1.1111111111111112,
                          0.12154770452930307,
                          0.6214465011907717),
                         (1.0,
                          1.0947644252537633e-47,
                          0.6666666666666666,
                          0.4620981203732969,
                          1.2599210498948732),
                         (5.0,
                          -0.42105263157894735,
                          0.13333333333333333,
                          1.535056728662697,
                          4.481404746557165)]},
 (5, 2, 0): {'K': [(0.5, 0.5153882032022076), (2.0, 4.031128874149275), (30.0, 3485.685047447632)],
             'profile': [(0.6,
                          0.23611111111111124,
                          0.5151515151515151,
                          0.05552634731965589,
                          0.7387279587886922),
                         (1.0, -0.875, 0.3333333333333333, 0.21972245773362195, 1.0844717711976986),
                         (5.0, -1.475, 0.07636363636363637, 0.8014666370464942, 2.1823331000944726)]},
 (6, 3, 2): {'K': [(0.5, 0.5075808784442678), (2.0, 2.181321287472077), (30.0, 450.1667284103033)],
             'profile': [(0.6,
                          0.2500000000000001,
                          0.8333333333333334,
                          0.0911607783969773,
                          0.8126410337774762),
                         (1.0, -0.5, 0.5, 0.34657359027997264, 1.2599210498948732),
                         (5.0, -0.9285714285714286, 0.1, 1.151292546497023, 3.107232505953859)]},
 (6, 5, 0): {'K': [(0.5, 0.5075792125963003), (2.0, 1.5858825148251494), (30.0, 40.861048913641945)],
             'profile': [(0.6,
                          0.28225308641975316,
                          0.9331923839556607,
                          0.09666158730792494,
                          0.8171235342036701),
                         (1.0, -0.1625, 0.6935483870967742, 0.41961607876849855, 1.3553931348557982),
                         (5.0, -0.199988, 0.16296462964629646, 1.6681396780239923, 5.209998626205216)]}}

# (n, k) -> (X, F(X)) for closed-form K
PRIMITIVE = {(3, 1): [(0.5, 0.4925778626865585), (2.0, 1.4021821053254542), (50.0, 2.5215216598001744)],
 (4, 2): [(0.5, 0.4970024603569591), (2.0, 1.49757579174432), (50.0, 4.2026903553090325)],
 (5, 1): [(0.5, 0.4987142706662289), (2.0, 1.3148328467597357), (50.0, 1.547810659664885)]}
PRIMITIVE_INF = {(5, 1): 1.549696277747353}
