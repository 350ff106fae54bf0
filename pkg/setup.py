from setuptools import setup, find_packages

setup(
    name="aitken_kernels",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "click",
        "rich",
        "structlog",
        "numpy",
        "scipy",
        "pandas",
        "pydantic>=2.0",
        "python-dotenv",
    ],
    extras_require={
        "dev": [
            "pytest",
            "pytest-cov",
            "hypothesis",
            "black",
            "isort",
            "mypy",
        ]
    },
    entry_points={
        "console_scripts": [
            "aitken-kernels=aitken_kernels.cli:cli",
        ]
    },
    python_requires=">=3.9",
)
