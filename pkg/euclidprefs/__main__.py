"""Allow running as: python -m euclidprefs"""
from .cli import main

if __name__ == "__main__":
    main()
