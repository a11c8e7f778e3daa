from setuptools import setup, find_packages

setup(
    name="somnav",
    version="1.0.0",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "numpy",
        "scipy",
        "matplotlib",
        "pandas",
        "websockets>=11",
        "pytest"
    ],
    entry_points={"console_scripts": ["somnav=somnav.cli:main"]},
    python_requires=">=3.9",
    author="somnav developers",
    description="Self-Organizing Map memory, Markov-chain planning and operator overrides for a grid-world robot",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
)
