"""JSON schemas for qgm output documents"""
