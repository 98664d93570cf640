"""Exception types shared across the verifier."""


class VerifierError(Exception):
    """Base class for all errors raised by this package."""


class UnboundVariable(VerifierError):
    def __init__(self, name: str):
        super().__init__(f"unbound program variable: {name}")
        self.name = name


class UndefinedSymbol(VerifierError):
    def __init__(self, name: str):
        super().__init__(f"function or predicate symbol without definition: {name}")
        self.name = name


class EmptyState(VerifierError):
    pass


class FragmentUnsupported(VerifierError):
    pass


class UndeclaredSymbol(VerifierError):
    def __init__(self, name: str):
        super().__init__(f"symbol not declared in signature: {name}")
        self.name = name


class BudgetExceeded(VerifierError):
    pass


class OutsideLiftableFragment(VerifierError):
    def __init__(self, atom):
        super().__init__(f"state formula outside the liftable fragment: {atom}")
        self.atom = atom


class SignatureViolation(VerifierError):
    def __init__(self, symbol):
        super().__init__(f"symbol outside the kernel signature: {symbol}")
        self.symbol = symbol


class NoExplanation(VerifierError):
    pass


class UnknownProcedure(VerifierError):
    def __init__(self, name: str):
        super().__init__(f"procedure not declared: {name}")
        self.name = name


class FuelExhausted(VerifierError):
    pass


class RuleShapeMismatch(VerifierError):
    pass


class MissingArgument(VerifierError):
    pass


class ParseError(VerifierError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
