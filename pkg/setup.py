"""Setup script for the mmdt detector."""
from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

TEST_REQUIREMENTS = {"pytest", "scikit-learn"}

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="mmdt",
    version="0.1.0",
    author="mmdt developers",
    description="Multimodal multi-task detector for AI-generated images",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Scientific/Engineering :: Image Recognition",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
    install_requires=[r for r in requirements if r not in TEST_REQUIREMENTS],
    extras_require={"test": sorted(TEST_REQUIREMENTS)},
    entry_points={
        "console_scripts": [
            "mmdt=src.main:main",
        ],
    },
)
