from setuptools import setup, find_packages

setup(
    name='wearclust',
    version='0.1',
    packages=find_packages(exclude=['tests']),
    package_data={'wearclust': ['modalities.json']},
    description='Correlation and clustering of wearable heart rate and acceleration data',
    long_description=open('README.txt').read(),
    install_requires=[
        'docopt',
        'xarray',
        'scipy',
        'numpy',
        'pandas',
        'scikit-learn',
    ],
    entry_points={'console_scripts': [
        'wearclust = wearclust.console:main',
    ]},
)
