"""
semigroup-lab - 复系数椭圆算子在 L^p 上的拟压缩性分析
"""

__version__ = "0.1.0"
__author__ = "semigroup-lab Team"
