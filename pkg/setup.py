#!/usr/bin/env python3
"""
Setup script for the Bernoulli sieve laboratory

This creates an installable package with the sievelab command-line tool.
"""

from setuptools import setup, find_packages
import os

# Read the README file for long description
def read_readme():
    readme_path = os.path.join(os.path.dirname(__file__), 'README.md')
    if os.path.exists(readme_path):
        with open(readme_path, 'r', encoding='utf-8') as f:
            return f.read()
    return "Simulation, exact computation and limit laws for the Bernoulli sieve"

setup(
    name="sievelab",
    version="1.0.0",
    description="Simulation, exact computation and limit laws for the Bernoulli sieve",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    author="sievelab developers",
    author_email="developer@example.com",

    # Package configuration
    packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
    py_modules=['cli'],
    include_package_data=True,

    # Dependencies
    install_requires=[
        'click>=8.0.0',
        'numpy>=1.22.0',
        'scipy>=1.10.0',
    ],

    # Python version requirement
    python_requires='>=3.10',

    # Entry points for command-line tools
    entry_points={
        'console_scripts': [
            'sievelab=cli:cli',
        ],
    },

    # Classification
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Operating System :: OS Independent',
    ],

    keywords='bernoulli sieve, occupancy, stick-breaking, renewal theory, stable laws, monte carlo',
)
