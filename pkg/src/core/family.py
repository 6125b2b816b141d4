#!/usr/bin/env python3
"""
Structured program family

A small structured language for hand-written solvers: procedures made of
assignments, evaluations, break/continue, IF/ELSE, WHILE(true) and RETURN.
``validate_family`` checks the structural limits of the family,
``compile_ast`` lowers a valid AST to bytecode and ``walk`` interprets the
AST directly with the same semantics.

Assignments are immutable bindings: a name is bound once per scope and its
expression is re-evaluated where the name is used (inputs and hints are
read-only, so the value never changes). Procedures other than Initialize and
Query are inlined at their invocation sites.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .errors import CompileError, FamilyViolationError
from .vm import Bytecode, Hint, Instruction, Opcode, RunStatus, check_bytecode, input_tape

BINARY_OPS = {
    "AND": Opcode.AND,
    "OR": Opcode.OR,
    "XOR": Opcode.XOR,
    "ADD": Opcode.ADD,
    "LT": Opcode.LT,
}


# Expressions

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class InputBit:
    index: int


@dataclass(frozen=True)
class HintBit:
    index: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Emit:
    """Output the operand's value and yield it"""
    operand: "Expr"


Expr = Union[Const, InputBit, HintBit, Var, Not, BinOp, Emit]


# Statements

@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr


@dataclass(frozen=True)
class Eval:
    value: Expr


@dataclass(frozen=True)
class Invoke:
    name: str
    args: Tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Break:
    pass


@dataclass(frozen=True)
class Continue:
    pass


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class While:
    """WHILE(true) loop"""
    body: Tuple["Stmt", ...]


@dataclass(frozen=True)
class Return:
    value: Expr


Stmt = Union[Assign, Eval, Invoke, Break, Continue, If, While, Return]
STATEMENT_TYPES = (Assign, Eval, Invoke, Break, Continue, If, While, Return)


@dataclass(frozen=True)
class Procedure:
    name: str
    params: Tuple[str, ...] = ()
    body: Tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class Ast:
    procedures: Tuple[Procedure, ...]

    def procedure(self, name: str) -> Optional[Procedure]:
        return next((p for p in self.procedures if p.name == name), None)


# Family constraints

class FamilyRule(IntEnum):
    """Structural rules; values are the rule numbers reported in violations"""
    PUBLIC_PROCEDURES = 2
    PARAMETERS = 6
    LOCALS = 7
    STATEMENT_KINDS = 8
    HEAVY_EXPRESSIONS = 10
    LIGHT_EXPRESSIONS = 11
    NESTING = 13
    HEAVY_PROCEDURES = 14
    STATEMENTS_PER_PROCEDURE = 15
    PROGRAM_SIZE = 16
    GLOBAL_CONSTANTS = 17
    SOLVER_INTERFACE = 18


@dataclass(frozen=True)
class FamilyLimits:
    max_procedures: int = 20
    max_parameters: int = 20
    max_locals: int = 20
    max_expression_arity: int = 20
    heavy_expression_arity: int = 6
    max_heavy_expressions: int = 20
    max_light_expressions: int = 400
    max_nesting: int = 5
    heavy_nesting: int = 4
    max_heavy_procedures: int = 20
    max_statements_per_procedure: int = 400
    max_program_bytes: int = 20000
    max_global_constants: int = 400

    @classmethod
    def scaled(cls, limit: int = 5) -> "FamilyLimits":
        """Every count-style limit lowered to ``limit``; nesting kept"""
        return cls(
            max_procedures=limit,
            max_parameters=limit,
            max_locals=limit,
            max_expression_arity=limit,
            heavy_expression_arity=min(6, limit),
            max_heavy_expressions=limit,
            max_light_expressions=limit * 20,
            max_heavy_procedures=limit,
            max_statements_per_procedure=limit * 20,
            max_program_bytes=limit * 1000,
            max_global_constants=limit * 20,
        )


@dataclass(frozen=True)
class FamilyViolation:
    rule: FamilyRule
    message: str
    procedure: Optional[str] = None

    @property
    def item(self) -> int:
        return int(self.rule)

    def __str__(self) -> str:
        where = f" in {self.procedure}" if self.procedure else ""
        return f"rule {self.item} ({self.rule.name.lower()}){where}: {self.message}"


def _expr_children(expr: Expr) -> Tuple[Expr, ...]:
    if isinstance(expr, (Not, Emit)):
        return (expr.operand,)
    if isinstance(expr, BinOp):
        return (expr.left, expr.right)
    return ()


def _expr_variables(expr: Expr) -> Set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    found: Set[str] = set()
    for child in _expr_children(expr):
        found |= _expr_variables(child)
    return found


def _expr_constants(expr: Expr) -> int:
    own = 1 if isinstance(expr, Const) else 0
    return own + sum(_expr_constants(child) for child in _expr_children(expr))


def _statement_expressions(stmt: Stmt) -> List[Expr]:
    if isinstance(stmt, (Assign, Eval, Return)):
        return [stmt.value]
    if isinstance(stmt, If):
        return [stmt.cond]
    if isinstance(stmt, Invoke):
        return list(stmt.args)
    return []


def _walk_statements(body: Sequence[Stmt], depth: int = 0):
    """Yield (statement, nesting depth) in program order"""
    for stmt in body:
        yield stmt, depth
        if isinstance(stmt, If):
            yield from _walk_statements(stmt.then, depth + 1)
            yield from _walk_statements(stmt.orelse, depth + 1)
        elif isinstance(stmt, While):
            yield from _walk_statements(stmt.body, depth + 1)


def _nesting(body: Sequence[Stmt]) -> int:
    deepest = 0
    for stmt, depth in _walk_statements(body):
        if isinstance(stmt, (If, While)):
            deepest = max(deepest, depth + 1)
    return deepest


def validate_family(ast: Ast, limits: FamilyLimits = FamilyLimits()) -> List[FamilyViolation]:
    """Every breached structural rule; empty when the AST belongs to the family"""
    violations: List[FamilyViolation] = []

    def breach(rule: FamilyRule, message: str, procedure: Optional[str] = None):
        violations.append(FamilyViolation(rule, message, procedure))

    if len(ast.procedures) > limits.max_procedures:
        breach(FamilyRule.PUBLIC_PROCEDURES,
               f"{len(ast.procedures)} procedures, limit {limits.max_procedures}")

    heavy_expressions = 0
    light_expressions = 0
    constants = 0
    heavy_procedures = 0
    for proc in ast.procedures:
        if len(proc.params) > limits.max_parameters:
            breach(FamilyRule.PARAMETERS,
                   f"{len(proc.params)} parameters, limit {limits.max_parameters}", proc.name)
        statements = list(_walk_statements(proc.body))
        if len(statements) > limits.max_statements_per_procedure:
            breach(FamilyRule.STATEMENTS_PER_PROCEDURE,
                   f"{len(statements)} statements, limit {limits.max_statements_per_procedure}", proc.name)
        local_names = {stmt.name for stmt, _ in statements if isinstance(stmt, Assign)}
        if len(local_names) > limits.max_locals:
            breach(FamilyRule.LOCALS, f"{len(local_names)} locals, limit {limits.max_locals}", proc.name)
        for stmt, _ in statements:
            if not isinstance(stmt, STATEMENT_TYPES):
                breach(FamilyRule.STATEMENT_KINDS, f"unsupported statement {type(stmt).__name__}", proc.name)
                continue
            for expr in _statement_expressions(stmt):
                arity = len(_expr_variables(expr))
                constants += _expr_constants(expr)
                if arity > limits.max_expression_arity:
                    breach(FamilyRule.HEAVY_EXPRESSIONS,
                           f"expression over {arity} variables, limit {limits.max_expression_arity}", proc.name)
                elif arity >= limits.heavy_expression_arity:
                    heavy_expressions += 1
                else:
                    light_expressions += 1
        nesting = _nesting(proc.body)
        if nesting > limits.max_nesting:
            breach(FamilyRule.NESTING, f"nesting level {nesting}, limit {limits.max_nesting}", proc.name)
        if nesting >= limits.heavy_nesting:
            heavy_procedures += 1

    if heavy_expressions > limits.max_heavy_expressions:
        breach(FamilyRule.HEAVY_EXPRESSIONS,
               f"{heavy_expressions} heavy expressions, limit {limits.max_heavy_expressions}")
    if light_expressions > limits.max_light_expressions:
        breach(FamilyRule.LIGHT_EXPRESSIONS,
               f"{light_expressions} light expressions, limit {limits.max_light_expressions}")
    if heavy_procedures > limits.max_heavy_procedures:
        breach(FamilyRule.HEAVY_PROCEDURES,
               f"{heavy_procedures} heavy procedures, limit {limits.max_heavy_procedures}")
    if constants > limits.max_global_constants:
        breach(FamilyRule.GLOBAL_CONSTANTS, f"{constants} constants, limit {limits.max_global_constants}")

    query = ast.procedure("Query")
    if query is None or len(query.params) != 1:
        breach(FamilyRule.SOLVER_INTERFACE, "missing Query(instance)")
    initialize = ast.procedure("Initialize")
    if initialize is not None and len(initialize.params) != 1:
        breach(FamilyRule.SOLVER_INTERFACE, "Initialize must take exactly one parameter (hint)")

    if not violations:
        try:
            size = len(compile_ast(ast, check=False))
        except CompileError:
            size = 0
        if size > limits.max_program_bytes:
            breach(FamilyRule.PROGRAM_SIZE, f"{size} instructions, limit {limits.max_program_bytes}")
    return violations


# Compilation

Env = Dict[str, Expr]


def _resolve(expr: Expr, env: Env) -> Expr:
    """Substitute bound names so the result refers to inputs and hints only"""
    if isinstance(expr, Var):
        if expr.name not in env:
            raise CompileError(f"unknown identifier {expr.name!r}")
        return env[expr.name]
    if isinstance(expr, Not):
        return Not(_resolve(expr.operand, env))
    if isinstance(expr, Emit):
        return Emit(_resolve(expr.operand, env))
    if isinstance(expr, BinOp):
        if expr.op not in BINARY_OPS:
            raise CompileError(f"unknown operator {expr.op!r}")
        return BinOp(expr.op, _resolve(expr.left, env), _resolve(expr.right, env))
    if isinstance(expr, Const) and expr.value not in (0, 1):
        raise CompileError(f"constant {expr.value} is not a bit")
    return expr


@dataclass
class _Loop:
    start: int
    breaks: List[int] = field(default_factory=list)


class _Compiler:
    def __init__(self, ast: Ast):
        self.ast = ast
        self.code: List[List] = []
        self.inlining: List[str] = []

    def emit(self, op: Opcode, arg: int = 0) -> int:
        self.code.append([op, arg])
        return len(self.code) - 1

    def patch(self, at: int, target: int):
        self.code[at][1] = target - at

    def expr(self, expr: Expr):
        if isinstance(expr, Const):
            self.emit(Opcode.PUSH1 if expr.value else Opcode.PUSH0)
        elif isinstance(expr, InputBit):
            self.emit(Opcode.READ_INPUT, expr.index)
        elif isinstance(expr, HintBit):
            self.emit(Opcode.READ_HINT, expr.index)
        elif isinstance(expr, Not):
            self.expr(expr.operand)
            self.emit(Opcode.NOT)
        elif isinstance(expr, BinOp):
            self.expr(expr.left)
            self.expr(expr.right)
            self.emit(BINARY_OPS[expr.op])
        elif isinstance(expr, Emit):
            self.expr(expr.operand)
            self.emit(Opcode.DUP)
            self.emit(Opcode.OUTPUT)
        else:
            raise CompileError(f"unsupported expression {expr!r}")

    def block(self, body: Sequence[Stmt], env: Env, loops: List[_Loop]):
        env = dict(env)
        for stmt in body:
            self.statement(stmt, env, loops)

    def statement(self, stmt: Stmt, env: Env, loops: List[_Loop]):
        if isinstance(stmt, Assign):
            if stmt.name in env:
                raise CompileError(f"{stmt.name!r} is already bound")
            env[stmt.name] = _resolve(stmt.value, env)
        elif isinstance(stmt, Eval):
            self.expr(_resolve(stmt.value, env))
            self.emit(Opcode.POP)
        elif isinstance(stmt, Return):
            self.expr(_resolve(stmt.value, env))
            self.emit(Opcode.OUTPUT)
            self.emit(Opcode.HALT)
        elif isinstance(stmt, If):
            self.expr(_resolve(stmt.cond, env))
            skip = self.emit(Opcode.JZ)
            self.block(stmt.then, env, loops)
            if stmt.orelse:
                done = self.emit(Opcode.JMP)
                self.patch(skip, len(self.code))
                self.block(stmt.orelse, env, loops)
                self.patch(done, len(self.code))
            else:
                self.patch(skip, len(self.code))
        elif isinstance(stmt, While):
            loop = _Loop(start=len(self.code))
            self.block(stmt.body, env, loops + [loop])
            back = self.emit(Opcode.JMP)
            self.patch(back, loop.start)
            for at in loop.breaks:
                self.patch(at, len(self.code))
        elif isinstance(stmt, Break):
            if not loops:
                raise CompileError("break outside a loop")
            loops[-1].breaks.append(self.emit(Opcode.JMP))
        elif isinstance(stmt, Continue):
            if not loops:
                raise CompileError("continue outside a loop")
            self.patch(self.emit(Opcode.JMP), loops[-1].start)
        elif isinstance(stmt, Invoke):
            self.invoke(stmt, env)
        else:
            raise CompileError(f"unsupported statement {type(stmt).__name__}")

    def invoke(self, stmt: Invoke, env: Env):
        proc = self.ast.procedure(stmt.name)
        if proc is None or proc.name in ("Initialize", "Query"):
            raise CompileError(f"unknown procedure {stmt.name!r}")
        if len(stmt.args) != len(proc.params):
            raise CompileError(
                f"{proc.name} takes {len(proc.params)} arguments, {len(stmt.args)} given"
            )
        if proc.name in self.inlining:
            raise CompileError(f"recursive invocation of {proc.name}")
        callee_env = {param: _resolve(arg, env) for param, arg in zip(proc.params, stmt.args)}
        self.inlining.append(proc.name)
        self.block(proc.body, callee_env, [])
        self.inlining.pop()

    def program(self) -> List[Instruction]:
        initialize = self.ast.procedure("Initialize")
        query = self.ast.procedure("Query")
        if query is None:
            raise CompileError("missing Query procedure")
        if initialize is not None:
            self.block(initialize.body, {}, [])
        self.block(query.body, {}, [])
        end = len(self.code)
        targets_end = any(op in (Opcode.JZ, Opcode.JMP) and at + arg == end
                          for at, (op, arg) in enumerate(self.code))
        if not self.code or self.code[-1][0] is not Opcode.HALT or targets_end:
            self.emit(Opcode.HALT)
        return [Instruction(op, arg) for op, arg in self.code]


def compile_ast(ast: Ast, limits: FamilyLimits = FamilyLimits(), check: bool = True) -> Bytecode:
    """Lower a family-valid AST to bytecode"""
    if check:
        violations = validate_family(ast, limits)
        if violations:
            raise FamilyViolationError(violations)
    return check_bytecode(_Compiler(ast).program())


# Direct interpretation

class _Halt(Exception):
    pass


class _Trap(Exception):
    pass


class _OutOfSteps(Exception):
    pass


class _BreakSignal(Exception):
    pass


class _ContinueSignal(Exception):
    pass


@dataclass(frozen=True)
class WalkOutcome:
    status: RunStatus
    output: Optional[str]


class _Walker:
    def __init__(self, ast: Ast, input_bits: str, hint: Hint, max_steps: int, input_width: Optional[int]):
        self.ast = ast
        self.data = input_tape(input_bits, input_width)
        self.hint = hint.bits
        self.out: List[str] = []
        self.steps = 0
        self.max_steps = max_steps

    def tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise _OutOfSteps()

    def value(self, expr: Expr, env: Env) -> int:
        if isinstance(expr, Const):
            return expr.value
        if isinstance(expr, InputBit):
            if expr.index >= len(self.data):
                raise _Trap()
            return self.data[expr.index]
        if isinstance(expr, HintBit):
            if expr.index >= len(self.hint):
                raise _Trap()
            return self.hint[expr.index]
        if isinstance(expr, Var):
            if expr.name not in env:
                raise CompileError(f"unknown identifier {expr.name!r}")
            return self.value(env[expr.name], env)
        if isinstance(expr, Not):
            return 1 - self.value(expr.operand, env)
        if isinstance(expr, Emit):
            bit = self.value(expr.operand, env)
            self.out.append(str(bit))
            return bit
        if isinstance(expr, BinOp):
            a = self.value(expr.left, env)
            b = self.value(expr.right, env)
            if expr.op == "AND":
                return a & b
            if expr.op == "OR":
                return a | b
            if expr.op == "LT":
                return 1 if a < b else 0
            return a ^ b
        raise CompileError(f"unsupported expression {expr!r}")

    def block(self, body: Sequence[Stmt], env: Env):
        env = dict(env)
        for stmt in body:
            self.tick()
            if isinstance(stmt, Assign):
                env[stmt.name] = _resolve(stmt.value, env)
            elif isinstance(stmt, Eval):
                self.value(stmt.value, env)
            elif isinstance(stmt, Return):
                self.out.append(str(self.value(stmt.value, env)))
                raise _Halt()
            elif isinstance(stmt, If):
                branch = stmt.then if self.value(stmt.cond, env) else stmt.orelse
                self.block(branch, env)
            elif isinstance(stmt, While):
                while True:
                    self.tick()
                    try:
                        self.block(stmt.body, env)
                    except _BreakSignal:
                        break
                    except _ContinueSignal:
                        continue
            elif isinstance(stmt, Break):
                raise _BreakSignal()
            elif isinstance(stmt, Continue):
                raise _ContinueSignal()
            elif isinstance(stmt, Invoke):
                proc = self.ast.procedure(stmt.name)
                callee_env = {p: _resolve(a, env) for p, a in zip(proc.params, stmt.args)}
                self.block(proc.body, callee_env)


def walk(ast: Ast, input_bits: str, hint: Hint = Hint(), max_steps: int = 100_000,
         input_width: Optional[int] = None) -> WalkOutcome:
    """Interpret the AST directly; the reference semantics for compile_ast

    Input bits are read from the same tape as the machine sees, end marker
    and padding included.
    """
    walker = _Walker(ast, input_bits, hint, max_steps, input_width)
    try:
        initialize = ast.procedure("Initialize")
        if initialize is not None:
            walker.block(initialize.body, {})
        walker.block(ast.procedure("Query").body, {})
    except _Halt:
        pass
    except _Trap:
        return WalkOutcome(RunStatus.TRAPPED, None)
    except _OutOfSteps:
        return WalkOutcome(RunStatus.FUEL_EXHAUSTED, None)
    return WalkOutcome(RunStatus.HALTED, "".join(walker.out))
