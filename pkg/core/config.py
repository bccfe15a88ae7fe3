from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="FRAMEFORGE_")

    threads: int = 1
    reduction_chunk: int = 1024
    lattice_point_cap: int = 1_000_000
    atom_norm_floor: float = 1e-12
    log_level: str = "INFO"
    log_format: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"
    PROJECT_NAME: str = "frameforge"


settings = Settings()
