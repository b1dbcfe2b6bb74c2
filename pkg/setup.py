from setuptools import setup, find_packages

setup(
   name='gglrlib',
   version='0.3.0',
   description='Gradient graph Laplacian regularized image restoration: priors, ADMM/CG solvers and a CLI',
   author='O.S. Agba',
   author_email='',
   packages=find_packages(exclude=['tests']),
   install_requires=['numpy', 'scipy', 'pandas', 'tabulate', 'joblib'],
   extras_require={'test': ['pytest']},
   entry_points={'console_scripts': ['gglr=gglrlib.cli:main']},
)
