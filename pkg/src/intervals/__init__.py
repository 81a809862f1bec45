"""区间与增长界模块"""
