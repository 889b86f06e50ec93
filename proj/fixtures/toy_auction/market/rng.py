# random number helper: seeded random draws for price noise
seed = 7
