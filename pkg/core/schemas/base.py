from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    """
    Base schema class with common configuration for all documents.
    Enables attribute mode so domain objects validate straight into schemas.
    """

    model_config = ConfigDict(from_attributes=True)
