"""Service subpackage: FastAPI app and its pydantic schemas."""
