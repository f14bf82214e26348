"""Shipped prompt texts and reference workflows.

These are the stock materials every pipeline starts from: the generation
prompt templates, the five-step template workflow, and the two reference
workflows (task parsing, code rewriting) with their default agent
prompts.
"""

from __future__ import annotations

from .ir import WorkflowIR, make_workflow

WORKFLOW_GENERATION_PROMPT = """\
You are an AI workflow designer. Your task is to create a detailed Agent Workflow tailored to the provided workflow template and dataset description. Please follow these steps:

1. Review the Workflow Template:
{workflow_template}

2. Analyze the Dataset Description:
{dataset_description}

3. Design the Agent Workflow: Based on the above information, develop a comprehensive Agent Workflow that includes:
   - Inputs and Outputs: Define the types of input data and the expected output results.
   - Steps and Sequence: Outline each step of the workflow and specify the order of execution.
   - Agent Roles and Responsibilities: Describe the role and duties of the agent at each step.

Answer with the workflow only, written in exactly the same format as the template."""

AGENT_GENERATION_PROMPT = """\
You are an AI prompt engineer. Your task is to create specific prompts for each agent in the provided workflow. Please follow these steps:

1. Understand the Workflow: Here is the detailed workflow:
{workflow}

2. Identify Agent Roles: Based on the workflow, determine the distinct roles and responsibilities of each agent involved.

3. Generate Agent-Specific Prompts: For each identified agent, craft a clear and concise prompt that includes:
   - Agent Role: A brief description of the agent's function within the workflow.
   - Objectives: The specific goals the agent is expected to achieve.
   - Inputs: The information or data the agent will receive.
   - Outputs: The expected results or actions the agent should produce.

Write the complete prompt for the agent named '{agent_name}'. Return only the prompt text."""

TASK_PARSING_AGENT_PROMPT = (
    "You are a task parsing agent. Comprehensively summarize the given "
    "programming task for the subsequent code generation. You will NOT "
    "return anything except for the task summary."
)

CODE_GENERATION_AGENT_PROMPT = (
    "You are a proficient Python programmer. Your task is to write Python "
    "code according to the summary parsed by your colleague. You will be "
    "given the problem description followed by the summary. You will NOT "
    "return anything except for the program."
)

CODE_REVIEWER_AGENT_PROMPT = (
    "You are a critical python code reviewer. You are tasked to label "
    "generated codes with 1 or 0, where 1 indicates that this code "
    "satisfies the requirements and can pass the sample test, while 0 "
    "indicates that this code doesn't satisfies the requirements and will "
    "fail the sample test. You will be given the Problem Description "
    "followed by the corresponding Generated Code. You will NOT return "
    "anything except for the numerical label."
)

CODE_REWRITING_AGENT_PROMPT = (
    "You are a proficient Python programmer tasked with coding solutions "
    "based on given problem specifications. You just generated some codes "
    "that cannot pass the sample test. You role is to regenerate python "
    "code that strictly adheres to the specifications, ensuring it reads "
    "input from standard input (stdin) and writes output to standard "
    "output (stdout). You will be given the Problem Description followed "
    "by the Comments and Reasons why your previous code fails. You will "
    "NOT return anything except for the program."
)

BASELINE_AGENT_PROMPT = (
    "You are a proficient Python programmer. Solve the given programming "
    "task. You will NOT return anything except for the program."
)

# Five-step template workflow used to seed workflow generation.
TEMPLATE_WORKFLOW: WorkflowIR = make_workflow(
    [
        ("task_parsing_agent", ["task_description"], "parsed_task"),
        ("task_refinement_agent", ["task_description", "parsed_task"], "refined_task"),
        ("code_generation_agent", ["refined_task"], "generated_code"),
        ("code_reviewer_agent", ["refined_task", "generated_code"], "review_comments"),
        ("code_refinement_agent", ["refined_task", "review_comments"], "refined_code"),
    ]
)

# Reference workflow: parse the task, then generate code from the summary.
TASK_PARSING_WORKFLOW: WorkflowIR = make_workflow(
    [
        ("task_parsing_agent", ["task_description"], "parsed_task"),
        ("code_generation_agent", ["task_description", "parsed_task"], "generated_code"),
    ]
)

TASK_PARSING_AGENTS: dict[str, str] = {
    "task_parsing_agent": TASK_PARSING_AGENT_PROMPT,
    "code_generation_agent": CODE_GENERATION_AGENT_PROMPT,
}

# Reference workflow: generate, review, rewrite (reviewer/rewriter loop at
# execution time).
CODE_REWRITING_WORKFLOW: WorkflowIR = make_workflow(
    [
        ("code_generation_agent", ["task_description"], "generated_code"),
        ("code_reviewer_agent", ["task_description", "generated_code"], "review_comments"),
        ("code_rewriting_agent", ["task_description", "review_comments"], "rewritten_code"),
    ]
)

CODE_REWRITING_AGENTS: dict[str, str] = {
    "code_generation_agent": CODE_GENERATION_AGENT_PROMPT,
    "code_reviewer_agent": CODE_REVIEWER_AGENT_PROMPT,
    "code_rewriting_agent": CODE_REWRITING_AGENT_PROMPT,
}
