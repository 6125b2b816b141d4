# Finite complexity calculus, hinted-program search and problem packs
