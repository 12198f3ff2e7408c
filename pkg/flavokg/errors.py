from typing import Optional


class FlavoKGError(ValueError):
    """Base error for every failure raised by flavokg"""


class IngestError(FlavoKGError):
    """A source table could not be parsed"""

    def __init__(
        self, message: str, file_name: str, line_number: Optional[int] = None
    ) -> None:
        self.file_name = file_name
        self.line_number = line_number
        where = file_name if line_number is None else f"{file_name}:{line_number}"
        super().__init__(f"{where}: {message}")


class NormalizationError(FlavoKGError):
    pass


class VocabularyError(FlavoKGError):
    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class GraphBuildError(FlavoKGError):
    pass


class SchemaViolationError(GraphBuildError):
    def __init__(self, source_kind: str, edge_kind: str, target_kind: str) -> None:
        self.source_kind = source_kind
        self.edge_kind = edge_kind
        self.target_kind = target_kind
        super().__init__(
            f"edge kind '{edge_kind}' may not connect a '{source_kind}' node "
            f"to a '{target_kind}' node"
        )


class UnknownNodeError(FlavoKGError):
    def __init__(self, iri: str) -> None:
        self.iri = iri
        super().__init__(f"unknown node: {iri}")


class TemplateError(FlavoKGError):
    def __init__(self, message: str, row: Optional[int] = None) -> None:
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class PrefixError(FlavoKGError):
    def __init__(self, prefix: str) -> None:
        self.prefix = prefix
        super().__init__(f"unresolvable prefix: '{prefix}'")


class LabelConflictError(FlavoKGError):
    def __init__(self, iri: str, labels: list) -> None:
        self.iri = iri
        self.labels = sorted(labels)
        quoted = ", ".join(f'"{label}"' for label in self.labels)
        super().__init__(f"conflicting labels for {iri}: {quoted}")


class QuerySyntaxError(FlavoKGError):
    def __init__(self, message: str, column: int) -> None:
        self.column = column
        super().__init__(f"column {column}: {message}")


class ConfigError(FlavoKGError):
    pass
