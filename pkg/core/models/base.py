from pydantic import BaseModel, ConfigDict


class Base(BaseModel):
    """Immutable value type shared by the numerical services."""

    model_config = ConfigDict(frozen=True, extra="forbid")
