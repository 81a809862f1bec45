"""离散微积分模块"""
