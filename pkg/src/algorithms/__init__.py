# Algorithms package initialization