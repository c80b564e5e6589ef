class RoadPrepError(Exception):
    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)
        self.stage: str | None = None


class ParameterError(RoadPrepError):
    pass


class EmptyInputError(RoadPrepError):
    pass


class DecodeError(RoadPrepError):
    pass


class FormatError(RoadPrepError):
    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f'{message} (at byte offset {offset})'
        super().__init__(message)
        self.offset = offset


class ShapeError(RoadPrepError):
    def __init__(self, message: str, stage: str | None = None):
        if stage is not None:
            message = f'{stage}: {message}'
        super().__init__(message)
        self.stage = stage


class GeometryError(RoadPrepError):
    pass


class DegenerateFitError(RoadPrepError):
    exit_code = 3


class NonRoadGeometryError(RoadPrepError):
    exit_code = 4


class UndefinedRecallError(RoadPrepError):
    exit_code = 5
