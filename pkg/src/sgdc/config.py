from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    project_name: str = "sgdc"
    seed: int | None = None
    jobs: int = 1
    log_level: str = "WARNING"
    certify_tol: float = 1e-8
    max_api_trials: int = 20
    max_api_dimension: int = 2000
    model_config = SettingsConfigDict(env_file=".env", env_prefix="SGDC_")
    # env vars will always override settings from .env


settings = Settings()
