from pydantic import BaseModel, ConfigDict


class ApiVersion(BaseModel):
    "The schema version of the documents this service reads and writes"

    model_config = ConfigDict(
        json_schema_extra={"examples": [{"version": 1, "package": "0.1.0"}]},
    )

    version: int
    package: str
