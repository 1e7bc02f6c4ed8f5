from setuptools import setup

setup(
    name='pivlink',
    description=('pivlink: Record Linkage on Partially Identifying Variables '
                 'with Stochastic EM'),
    version='0.1-dev',
    packages=['pivlink', 'pivlink.inference', 'pivlink.simulate'],
    python_requires='>=3.11',
    install_requires=['numpy>=1.22', 'scipy>=1.8', 'pandas>=1.4',
                      'jellyfish>=0.9'],
    extras_require={'tests': ['pytest']},
    entry_points={'console_scripts': ['pivlink = pivlink.cli:main']},
)
