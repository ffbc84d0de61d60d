"""
Morse-Bott verification engine source package
"""
