# Models package initialization