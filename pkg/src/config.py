from pydantic_settings import BaseSettings
from pydantic import Field

class Settings(BaseSettings):
    """Application settings for the Ultrametric Toolkit."""

    # Application settings
    APP_NAME: str = "Ultrametric Toolkit"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = Field(default=False, json_schema_extra={"env": "DEBUG"})

    # Server settings
    HOST: str = Field(default="0.0.0.0", json_schema_extra={"env": "HOST"})
    PORT: int = Field(default=8001, json_schema_extra={"env": "PORT"})

    # Monitoring settings
    ENABLE_METRICS: bool = Field(default=True, json_schema_extra={"env": "ENABLE_METRICS"})
    LOG_LEVEL: str = Field(default="INFO", json_schema_extra={"env": "LOG_LEVEL"})
    LOG_JSON: bool = Field(default=False, json_schema_extra={"env": "LOG_JSON"})

    # Search bounds
    BRUTE_FORCE_PARTIAL_MAX_POINTS: int = Field(
        default=6, ge=0, json_schema_extra={"env": "BRUTE_FORCE_PARTIAL_MAX_POINTS"}
    )
    BRUTE_FORCE_AUTOMORPHISM_MAX_POINTS: int = Field(
        default=8, ge=0, json_schema_extra={"env": "BRUTE_FORCE_AUTOMORPHISM_MAX_POINTS"}
    )
    MODULE_ENUMERATION_MAX_ELEMENTS: int = Field(
        default=12, ge=0, json_schema_extra={"env": "MODULE_ENUMERATION_MAX_ELEMENTS"}
    )
    HEREDITARY_MAX_ELEMENTS: int = Field(
        default=8, ge=0, json_schema_extra={"env": "HEREDITARY_MAX_ELEMENTS"}
    )

    # Construction bounds
    PRODUCT_MAX_SIZE: int = Field(default=4096, ge=1, json_schema_extra={"env": "PRODUCT_MAX_SIZE"})
    CANTOR_MAX_DEPTH: int = Field(default=12, ge=1, json_schema_extra={"env": "CANTOR_MAX_DEPTH"})

    model_config = {
        "env_file": ".env",
        "case_sensitive": True
    }

# Global settings instance
settings = Settings()
