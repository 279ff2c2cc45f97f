import setuptools

# Load the long_description from README.md
with open('README.md', 'r') as fh:
    long_description = fh.read()

setuptools.setup(
    name='cauchy-deconv',
    version='0.1.0',
    description="Iterative deconvolution of smooth images by Cauchy sequences of weight functions",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=['tests', 'tests.*']),
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.8',
        'Pillow>=9.1',
    ],
    extras_require={
        'test': ['pytest'],
        'docs': ['sphinx', 'sphinx_rtd_theme'],
    },
    entry_points={
        'console_scripts': [
            'cauchy-deconv=cauchy_deconv.cli:main',
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
)
